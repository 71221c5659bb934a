"""Sentence templates for the mini-MKQA fixture generator.

Three relation types, each with a question per query language and an
answer-bearing and answer-free ("stub") passage per corpus language.
``{E}`` is the entity, ``{X}`` the answer, ``{Y}`` a year.
"""

QUESTIONS = {
    "founder": {
        "en": "Who founded {E}?",
        "de": "Wer hat {E} gegründet?",
        "es": "¿Quién fundó {E}?",
        "zh": "谁创立了{E}？",
        "ko": "{E}의 설립자는 누구인가요?",
        "fi": "Kuka perusti yrityksen {E}?",
        "th": "ใครเป็นผู้ก่อตั้ง {E}",
    },
    "songwriter": {
        "en": "Who wrote the song {E}?",
        "de": "Wer schrieb das Lied {E}?",
        "es": "¿Quién escribió la canción {E}?",
        "zh": "歌曲{E}是谁写的？",
        "ko": "노래 {E}의 작곡가는 누구인가요?",
        "fi": "Kuka kirjoitti kappaleen {E}?",
        "th": "ใครคือผู้ประพันธ์ {E}",
    },
    "architect": {
        "en": "Who designed the {E} Museum?",
        "de": "Wer hat das Museum {E} entworfen?",
        "es": "¿Quién diseñó el Museo {E}?",
        "zh": "{E}博物馆是谁设计的？",
        "ko": "{E} 박물관을 설계한 사람은 누구인가요?",
        "fi": "Kuka suunnitteli museon {E}?",
        "th": "ใครออกแบบ {E}",
    },
}

ANSWER = {
    "founder": {
        "en": "{E} is a company that makes precision tools. It was founded in {Y} by {X}, who ran it for two decades.",
        "de": "{E} ist ein Unternehmen, das Präzisionswerkzeuge herstellt. Es wurde {Y} von {X} gegründet, der es zwei Jahrzehnte lang leitete.",
        "es": "{E} es una empresa que fabrica herramientas de precisión. Fue fundada en {Y} por {X}, quien la dirigió durante dos décadas.",
        "fr": "{E} est une entreprise qui fabrique des outils de précision. Elle a été fondée en {Y} par {X}, qui l'a dirigée pendant vingt ans.",
        "fi": "{E} on yritys, joka valmistaa tarkkuustyökaluja. Sen perusti vuonna {Y} {X}, joka johti sitä kaksi vuosikymmentä.",
        "ru": "{E} — компания, выпускающая точные инструменты. Её основал в {Y} году {X}, который руководил ею двадцать лет.",
        "zh": "{E}是一家生产精密工具的公司。该公司由{X}于{Y}年创立，他领导公司长达二十年。",
        "ja": "{E}は精密工具を製造する企業である。{Y}年に{X}によって設立され、彼は二十年間経営を続けた。",
        "ko": "{E}는 정밀 공구를 만드는 회사이다. {Y}년에 {X}가 설립했으며, 그는 이십 년 동안 회사를 이끌었다.",
        "th": "{E} เป็นบริษัทที่ผลิตเครื่องมือความแม่นยำ ก่อตั้งขึ้นในปี {Y} โดย {X} ซึ่งบริหารบริษัทนานถึงสองทศวรรษ",
    },
    "songwriter": {
        "en": "{E} is a pop song released in {Y}. It was written by {X} and was played on the radio all summer.",
        "de": "{E} ist ein Popsong, der {Y} veröffentlicht wurde. Er wurde von {X} geschrieben und lief den ganzen Sommer im Radio.",
        "es": "{E} es una canción pop publicada en {Y}. Fue escrita por {X} y sonó en la radio todo el verano.",
        "fr": "{E} est une chanson pop sortie en {Y}. Elle a été écrite par {X} et a tourné à la radio tout l'été.",
        "fi": "{E} on vuonna {Y} julkaistu popkappale. Sen kirjoitti {X}, ja sitä soitettiin radiossa koko kesän.",
        "ru": "{E} — поп-песня, выпущенная в {Y} году. Её написал {X}, и всё лето она звучала по радио.",
        "zh": "{E}是一首发行于{Y}年的流行歌曲。这首歌由{X}创作，整个夏天都在电台播放。",
        "ja": "{E}は{Y}年に発売されたポップソングである。{X}が作詞作曲し、その夏はずっとラジオで流れた。",
        "ko": "{E}는 {Y}년에 발표된 팝 노래이다. {X}가 작곡했으며 여름 내내 라디오에서 흘러나왔다.",
        "th": "{E} เป็นเพลงป๊อปที่ออกในปี {Y} แต่งโดย {X} และเปิดทางวิทยุตลอดฤดูร้อน",
    },
    "architect": {
        "en": "The {E} Museum is an art museum that opened in {Y}. The building was designed by the architect {X}.",
        "de": "Das Museum {E} ist ein Kunstmuseum, das {Y} eröffnet wurde. Das Gebäude wurde von dem Architekten {X} entworfen.",
        "es": "El Museo {E} es un museo de arte inaugurado en {Y}. El edificio fue diseñado por el arquitecto {X}.",
        "fr": "Le musée {E} est un musée d'art ouvert en {Y}. Le bâtiment a été conçu par l'architecte {X}.",
        "fi": "Museo {E} on taidemuseo, joka avattiin vuonna {Y}. Rakennuksen suunnitteli arkkitehti {X}.",
        "ru": "Музей {E} — художественный музей, открытый в {Y} году. Здание спроектировал архитектор {X}.",
        "zh": "{E}博物馆是一座于{Y}年开馆的美术馆。馆舍由建筑师{X}设计。",
        "ja": "{E}博物館は{Y}年に開館した美術館である。建物は建築家の{X}が設計した。",
        "ko": "{E} 박물관은 {Y}년에 문을 연 미술관이다. 건물은 건축가 {X}가 설계했다.",
        "th": "พิพิธภัณฑ์ {E} เป็นพิพิธภัณฑ์ศิลปะที่เปิดในปี {Y} อาคารออกแบบโดยสถาปนิก {X}",
    },
}

STUB = {
    "founder": {
        "en": "{E} is a company that makes precision tools. Its products are sold in many countries, and its main factory employs several hundred people.",
        "de": "{E} ist ein Unternehmen, das Präzisionswerkzeuge herstellt. Seine Produkte werden in vielen Ländern verkauft, und im Hauptwerk arbeiten mehrere hundert Menschen.",
        "es": "{E} es una empresa que fabrica herramientas de precisión. Sus productos se venden en muchos países y su fábrica principal emplea a varios cientos de personas.",
        "fr": "{E} est une entreprise qui fabrique des outils de précision. Ses produits sont vendus dans de nombreux pays et son usine principale emploie plusieurs centaines de personnes.",
        "fi": "{E} on yritys, joka valmistaa tarkkuustyökaluja. Sen tuotteita myydään monissa maissa, ja sen päätehtaalla työskentelee useita satoja ihmisiä.",
        "ru": "{E} — компания, выпускающая точные инструменты. Её продукция продаётся во многих странах, а на главном заводе работают несколько сотен человек.",
        "zh": "{E}是一家生产精密工具的公司。其产品销往许多国家，主要工厂雇用了数百名员工。",
        "ja": "{E}は精密工具を製造する企業である。製品は多くの国で販売されており、主力工場では数百人が働いている。",
        "ko": "{E}는 정밀 공구를 만드는 회사이다. 제품은 여러 나라에서 판매되며, 주요 공장에서는 수백 명이 일한다.",
        "th": "{E} เป็นบริษัทที่ผลิตเครื่องมือความแม่นยำ สินค้าของบริษัทจำหน่ายในหลายประเทศ และโรงงานหลักมีพนักงานหลายร้อยคน",
    },
    "songwriter": {
        "en": "{E} is a pop song that appeared on a compilation album. The music video was filmed on a beach and shown on television for several weeks.",
        "de": "{E} ist ein Popsong, der auf einem Sampler erschien. Das Musikvideo wurde an einem Strand gedreht und mehrere Wochen lang im Fernsehen gezeigt.",
        "es": "{E} es una canción pop que apareció en un álbum recopilatorio. El videoclip se grabó en una playa y se emitió en televisión durante varias semanas.",
        "fr": "{E} est une chanson pop parue sur une compilation. Le clip a été tourné sur une plage et diffusé à la télévision pendant plusieurs semaines.",
        "fi": "{E} on popkappale, joka ilmestyi kokoelma-albumilla. Musiikkivideo kuvattiin rannalla, ja sitä näytettiin televisiossa useiden viikkojen ajan.",
        "ru": "{E} — поп-песня, вошедшая в сборник. Клип сняли на пляже, и его несколько недель показывали по телевидению.",
        "zh": "{E}是一首收录在合辑中的流行歌曲。音乐录影带在海滩拍摄，并在电视上播放了好几个星期。",
        "ja": "{E}はコンピレーション・アルバムに収録されたポップソングである。ミュージックビデオは海辺で撮影され、数週間テレビで放送された。",
        "ko": "{E}는 컴필레이션 앨범에 수록된 팝 노래이다. 뮤직비디오는 해변에서 촬영되었고 몇 주 동안 텔레비전에 방영되었다.",
        "th": "{E} เป็นเพลงป๊อปที่อยู่ในอัลบั้มรวมเพลง มิวสิกวิดีโอถ่ายทำที่ชายหาดและออกอากาศทางโทรทัศน์หลายสัปดาห์",
    },
    "architect": {
        "en": "The {E} Museum is an art museum with a large collection of paintings. It is closed on Mondays and offers guided tours for schools.",
        "de": "Das Museum {E} ist ein Kunstmuseum mit einer großen Gemäldesammlung. Montags ist es geschlossen, und für Schulen gibt es Führungen.",
        "es": "El Museo {E} es un museo de arte con una gran colección de pinturas. Cierra los lunes y ofrece visitas guiadas para escuelas.",
        "fr": "Le musée {E} est un musée d'art qui possède une grande collection de tableaux. Il est fermé le lundi et propose des visites guidées aux écoles.",
        "fi": "Museo {E} on taidemuseo, jolla on laaja maalauskokoelma. Se on suljettu maanantaisin ja tarjoaa opastettuja kierroksia kouluille.",
        "ru": "Музей {E} — художественный музей с большой коллекцией картин. По понедельникам он закрыт, а для школ проводятся экскурсии.",
        "zh": "{E}博物馆是一座收藏大量绘画的美术馆。每周一闭馆，并为学校提供导览服务。",
        "ja": "{E}博物館は多くの絵画を所蔵する美術館である。月曜日は休館で、学校向けのガイドツアーを行っている。",
        "ko": "{E} 박물관은 많은 회화를 소장한 미술관이다. 월요일에는 문을 닫으며 학교를 위한 안내 관람을 제공한다.",
        "th": "พิพิธภัณฑ์ {E} เป็นพิพิธภัณฑ์ศิลปะที่มีภาพวาดจำนวนมาก ปิดทุกวันจันทร์และมีบริการนำชมสำหรับโรงเรียน",
    },
}

# Worked cases: hand-written passages for three well-known failure/success
# patterns. Each non-English passage carries its English rendering.
SPECIAL = {
    "queens": {
        "query": {"lang": "zh", "question": "英格兰有多少位女王",
                  "en": "How many queens have there been in England?", "golds": ["8"],
                  "category": "B", "answer_langs": ["en"]},
        "docs": [
            {"lang": "en", "answer": True, "title": "Queens regnant of England (英格兰女王)",
             "text": "The queens regnant of England (英格兰女王) ruled in their own right. In under two centuries, 8 queens (8位女王) reigned over England, from Matilda to Anne."},
            {"lang": "en", "answer": False, "title": "Monarchy of the United Kingdom",
             "text": "The monarchy of the United Kingdom began in 1707, when the kingdoms of England and Scotland were joined into one state. Thirteen monarchs have reigned since the union."},
            {"lang": "zh", "answer": False, "title": "英国君主",
             "text": "自1707年英格兰王国与苏格兰王国合并以来，大不列颠共有十三位君主。两国自1603年起已由斯图亚特王朝共同统治。",
             "en_title": "British monarchs",
             "en_text": "Since the kingdoms of England and Scotland merged in 1707, Great Britain has had thirteen monarchs. The two countries had been ruled jointly by the Stuart dynasty since 1603."},
            {"lang": "zh", "answer": False, "title": "玛蒂尔达皇后",
             "text": "玛蒂尔达是英格兰国王亨利一世的女儿，曾在无政府时期争夺英格兰王位。",
             "en_title": "Empress Matilda",
             "en_text": "Matilda was the daughter of King Henry I of England and fought for the English throne during the Anarchy."},
            {"lang": "zh", "answer": False, "title": "伊丽莎白二世",
             "text": "伊丽莎白二世于1952年至2022年在位，是英国在位时间最长的君主。",
             "en_title": "Elizabeth II",
             "en_text": "Elizabeth II reigned from 1952 to 2022 and was the longest-reigning British monarch."},
        ],
    },
    "barbie": {
        "query": {"lang": "ko", "question": "누가 '나는 바비걸' 노래를 만들었나요?",
                  "en": "Who made the song I'm a Barbie Girl?", "golds": ["아쿠아", "Aqua"],
                  "category": "B", "answer_langs": ["en"]},
        "docs": [
            {"lang": "en", "answer": True, "title": "Barbie Girl",
             "text": "Barbie Girl (Korean: 바비걸, '나는 바비걸') is a dance-pop song by the Danish-Norwegian group Aqua. It came out in 1997 as a single from the band's first album, Aquarium."},
            {"lang": "en", "answer": False, "title": "Barbie Girl (lyrics)",
             "text": "The lyrics of the song look like a tribute to the Barbie doll, but several lines carry double meanings, which caused some controversy in Denmark."},
            {"lang": "ko", "answer": False, "title": "바비걸 뮤직비디오",
             "text": "노래 '바비걸'의 뮤직비디오는 2005년에 이틀 동안 촬영되었으며 여러 감독이 함께 연출했다.",
             "en_title": "Barbie Girl music video",
             "en_text": "The music video for the song Barbie Girl was shot over two days in 2005 and was co-directed by several directors."},
            {"lang": "ko", "answer": False, "title": "바비와 삼총사",
             "text": "바비와 삼총사는 2009년에 DVD로 발매된 애니메이션 영화로, 바비 애니메이션 시리즈의 열여섯 번째 작품이다.",
             "en_title": "Barbie and the Three Musketeers",
             "en_text": "Barbie and the Three Musketeers is an animated film released on DVD in 2009 and the sixteenth entry in the Barbie animated series."},
            {"lang": "ko", "answer": False, "title": "바비 공주와 거지",
             "text": "2004년에 나온 바비 애니메이션 영화로, 바비가 공주와 가난한 소녀 두 역을 맡아 일곱 곡의 노래를 부른다.",
             "en_title": "Barbie as the Princess and the Pauper",
             "en_text": "A Barbie animated film from 2004 in which Barbie plays both a princess and a poor girl and sings seven songs."},
        ],
    },
    "campanita": {
        "query": {"lang": "es", "question": "¿quién escribió variaciones de Campanita del lugar?",
                  "en": "Who wrote variations of Tinkerbell of the Place?",
                  "golds": ["Wolfgang Amadeus Mozart", "Mozart"],
                  "category": "C", "answer_langs": ["es"], "mistranslated": True},
        "docs": [
            {"lang": "es", "answer": True, "title": "Campanita del lugar",
             "text": "Campanita del lugar es el nombre con el que se conoce en español una vieja melodía infantil francesa. Wolfgang Amadeus Mozart escribió doce variaciones para piano sobre esta melodía.",
             "en_title": "Campanita del lugar",
             "en_text": "Campanita del lugar is the Spanish name of an old French children's melody. Wolfgang Amadeus Mozart wrote twelve piano variations on this melody."},
            {"lang": "en", "answer": False, "title": "Twinkle, Twinkle, Little Star",
             "text": "Twinkle, Twinkle, Little Star is an English lullaby. Its words come from a poem by Jane Taylor and are sung to an old French melody."},
            {"lang": "en", "answer": False, "title": "Tinker Bell",
             "text": "Tinker Bell is a fairy from J. M. Barrie's 1904 play Peter Pan and its 1911 novel version, and she appears in many film and television adaptations of the story."},
            {"lang": "en", "answer": False, "title": "Tinker Bell (film)",
             "text": "Tinker Bell is a 2008 computer-animated film from DisneyToon Studios and the first entry in the Disney Fairies franchise."},
            {"lang": "en", "answer": False, "title": "Tinker Bell (film series)",
             "text": "The Tinker Bell films are a series of animated fantasy features about the fairy of the same name, first released on video and later in theaters."},
            {"lang": "en", "answer": False, "title": "J. M. Barrie",
             "text": "Sir James Matthew Barrie was a Scottish novelist and playwright, remembered above all as the creator of Peter Pan."},
            {"lang": "en", "answer": False, "title": "Jingle Bells",
             "text": "Jingle Bells is a traditional winter song written in the 1850s by the American composer James Lord Pierpont."},
        ],
    },
}
